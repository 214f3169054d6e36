# Generated by Django 4.2.7 on 2026-10-17 10:04

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='FaultCampaign',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('fecha_creacion', models.DateTimeField(auto_now_add=True, help_text='Momento en que se lanzó la ejecución', verbose_name='Fecha de creación')),
                ('fecha_actualizacion', models.DateTimeField(auto_now=True, verbose_name='Fecha de actualización')),
                ('kernel', models.CharField(db_index=True, max_length=64, verbose_name='Kernel')),
                ('mode', models.CharField(db_index=True, max_length=32, verbose_name='Modo')),
                ('wcdl', models.PositiveIntegerField(default=10, verbose_name='WCDL (ciclos)')),
                ('sb_size', models.PositiveIntegerField(default=4, verbose_name='Tamaño del SB')),
                ('report', models.JSONField(blank=True, default=dict, verbose_name='Reporte')),
                ('trials', models.PositiveIntegerField(default=1000)),
                ('seed', models.BigIntegerField(default=2024)),
                ('target_class', models.CharField(blank=True, choices=[('register', 'Registro'), ('store-value', 'Valor de store'), ('store-address', 'Dirección de store')], max_length=20, null=True)),
                ('negative_control', models.BooleanField(default=False)),
                ('recovered', models.PositiveIntegerField(default=0)),
                ('masked', models.PositiveIntegerField(default=0)),
                ('failed', models.PositiveIntegerField(default=0)),
            ],
            options={
                'verbose_name': 'Campaña de fallos',
                'verbose_name_plural': 'Campañas de fallos',
                'db_table': 'fault_campaigns',
                'ordering': ['-fecha_creacion'],
                'abstract': False,
            },
        ),
        migrations.CreateModel(
            name='SimulationRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('fecha_creacion', models.DateTimeField(auto_now_add=True, help_text='Momento en que se lanzó la ejecución', verbose_name='Fecha de creación')),
                ('fecha_actualizacion', models.DateTimeField(auto_now=True, verbose_name='Fecha de actualización')),
                ('kernel', models.CharField(db_index=True, max_length=64, verbose_name='Kernel')),
                ('mode', models.CharField(db_index=True, max_length=32, verbose_name='Modo')),
                ('wcdl', models.PositiveIntegerField(default=10, verbose_name='WCDL (ciclos)')),
                ('sb_size', models.PositiveIntegerField(default=4, verbose_name='Tamaño del SB')),
                ('report', models.JSONField(blank=True, default=dict, verbose_name='Reporte')),
                ('clq', models.CharField(choices=[('1', '1 entrada'), ('2', '2 entradas'), ('4', '4 entradas'), ('ideal', 'Ideal')], default='2', max_length=8)),
                ('compile_options', models.JSONField(blank=True, default=dict)),
                ('config', models.JSONField(blank=True, default=dict)),
                ('cycles', models.PositiveBigIntegerField(default=0)),
                ('baseline_cycles', models.PositiveBigIntegerField(blank=True, null=True)),
                ('instructions', models.PositiveBigIntegerField(default=0)),
            ],
            options={
                'verbose_name': 'Simulación',
                'verbose_name_plural': 'Simulaciones',
                'db_table': 'simulation_runs',
                'ordering': ['-fecha_creacion'],
                'abstract': False,
            },
        ),
    ]
